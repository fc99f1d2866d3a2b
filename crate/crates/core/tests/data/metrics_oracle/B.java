class B {
    int f(boolean a, boolean b) {
        int r = 0;
        if (a) { r++; }
        if (b) { r--; }
        return r;
    }
}
