import java.nio.file.Path;
import java.nio.file.Paths;

class Locations {
    Path resolve(String base) {
        Path root = Paths.get(base);
        return root.resolve("conf").normalize();
    }
}
