enum Level {
    LOW(1), HIGH(2);
    private final int weight;
    Level(int weight) {
        this.weight = weight;
    }
    int weight() {
        return weight;
    }
}
class Registry {
    private static final Registry INSTANCE = new Registry();
    private Registry() {
    }
    static Registry get() {
        return INSTANCE;
    }
}
