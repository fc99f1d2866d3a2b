public class Counter {
    private int count;
    private int limit;
    public static final int MAX = 10;

    public Counter(int limit) {
        this.limit = limit;
    }

    public void inc() {
        if (count < limit) {
            count++;
        }
    }

    public int get() {
        return count;
    }

    private void reset() {
        count = 0;
        inc();
    }
}
