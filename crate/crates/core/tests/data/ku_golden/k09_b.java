import java.util.function.*;

class Ops {
    BinaryOperator<Integer> add = (a, b) -> a + b;
    UnaryOperator<String> upper = s -> s.toUpperCase();
    BiFunction<Integer, Integer, Long> mul = (a, b) -> (long) a * b;
    Consumer<String> sink = s -> {};
}
