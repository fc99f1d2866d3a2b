import java.util.Arrays;
import java.util.List;
import java.util.stream.IntStream;

class Stats {
    int total(int[] values) {
        return Arrays.stream(values).sum();
    }
    long evens() {
        return IntStream.range(0, 10).filter(i -> i % 2 == 0).count();
    }
    boolean any(List<List<Integer>> nested) {
        return nested.stream().flatMap(List::stream).anyMatch(x -> x > 3);
    }
}
