class Outer {
    static class Nested {
    }
    class Inner {
    }
    void local() {
        class Helper {
        }
        Runnable r = new Runnable() {
            public void run() {
            }
        };
        final int k = 1;
    }
}
