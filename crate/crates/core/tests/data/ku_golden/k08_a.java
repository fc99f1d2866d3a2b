import java.util.ArrayList;
import java.util.List;

class Box<T> {
    T item;
    List<T> all() {
        List<T> out = new ArrayList<>();
        out.add(item);
        return out;
    }
}
