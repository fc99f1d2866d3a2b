class Arrays1 {
    void fill() {
        int[] data = new int[3];
        data[0] = 7;
        int first = data[0];
        String names[] = {"a", "b"};
    }
}
