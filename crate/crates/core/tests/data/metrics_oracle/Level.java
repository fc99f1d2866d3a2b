enum Level {
    LOW, HIGH;

    private final int weight;

    Level() {
        this.weight = ordinal();
    }

    static Level parse(String s) {
        return valueOf(s.trim());
    }
}
