class D {
    String name(int k) {
        switch (k) {
            case 1:
                return "one";
            case 2:
            case 3:
                return "few";
            default:
                return "many";
        }
    }
}
