class Iteration {
    void walk(int[] xs) {
        for (int i = 0; i < xs.length; i++) {
            if (xs[i] < 0) {
                continue;
            }
        }
        for (int x : xs) {
            x = x + 1;
        }
    }
}
