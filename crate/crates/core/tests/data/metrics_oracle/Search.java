class Search {
    int find(int[] xs, int t) {
        int at = -1;
        outer:
        for (int i = 0; i < xs.length; i++) {
            if (xs[i] == t) {
                at = i;
                break outer;
            }
        }
        return at;
    }

    int firstPositive(int[] xs) {
        for (int x : xs) {
            if (x > 0) {
                return x;
            }
        }
        return 0;
    }

    void loop(int n) {
        while (n > 0) {
            n--;
            if (n == 5) {
                continue;
            }
        }
    }
}
