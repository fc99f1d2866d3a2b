class Casting {
    void convert() {
        float f = 3.5f;
        byte b = (byte) f;
        char c = (char) (b + 1);
        Object o = (Object) "x";
    }
}
