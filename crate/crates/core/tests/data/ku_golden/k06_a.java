interface Shape {
    double area();
}
abstract class Base implements Shape {
    abstract String name();
}
class Circle extends Base {
    double r;
    Circle(double r) {
        super();
        this.r = r;
    }
    public double area() {
        return 3.14 * r * r;
    }
    @Override
    String name() {
        return "circle";
    }
}
