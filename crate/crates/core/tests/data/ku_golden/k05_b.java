final class Money {
    private final long cents;
    private final String code;
    Money(long cents, String code) {
        this.cents = cents;
        this.code = code;
    }
    Money scale(long k) {
        return new Money(cents * k, code);
    }
    Money scale(double k) {
        return new Money((long) (cents * k), code);
    }
}
