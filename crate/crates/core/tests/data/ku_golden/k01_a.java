class DataTypes {
    int count = 0;
    double ratio;
    void run() {
        long big = 10L, small = 2L;
        int narrowed = (int) big;
    }
}
