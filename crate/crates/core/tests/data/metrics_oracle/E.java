class E {
    int g(int a, int b) {
        for (int i = 0; i < a && i < b; i++) {
            while (a > 0 || b > 0) {
                a--;
            }
        }
        return a > b ? a : b;
    }
}
