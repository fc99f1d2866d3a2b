package demo.docs;

/**
 * Documented.
 */
public class Doc {
    /** The value. */
    private int v; // trailing

    // before method
    public int twice() {

        return v * 2; /* inline */
    }
}
