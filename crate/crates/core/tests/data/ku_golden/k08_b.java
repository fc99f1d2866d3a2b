import java.util.*;

class Sorting implements Comparable<Sorting> {
    int key;
    public int compareTo(Sorting o) {
        return Integer.compare(key, o.key);
    }
    void show(List<String> names, Comparator<String> cmp) {
        Collections.sort(names, cmp);
        names.forEach(n -> System.out.println(n));
        TreeMap<String, Integer> index = new TreeMap<>();
    }
}
