import java.io.FileReader;
import java.io.IOException;

class Loader {
    void load(String path) throws IOException {
        try (FileReader r = new FileReader(path)) {
            r.read();
        } catch (IllegalStateException | IllegalArgumentException e) {
            throw new IOException("bad");
        } catch (RuntimeException e) {
            assert path != null;
        } finally {
            path = null;
        }
    }
}
