import java.io.IOException;
import java.io.Reader;

class Loader {
    int load(Reader in) {
        try {
            return in.read();
        } catch (IOException e) {
            return -1;
        } catch (RuntimeException e) {
            throw e;
        } finally {
            close(in);
        }
    }

    void close(Reader in) {
        synchronized (this) {
            try (Reader r = in) {
                r.ready();
            } catch (IOException ignored) {
            }
        }
    }
}
