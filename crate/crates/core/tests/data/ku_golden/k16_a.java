import java.util.concurrent.ExecutorService;
import java.util.concurrent.Executors;
import java.util.concurrent.atomic.AtomicInteger;

class Workers {
    private final AtomicInteger done = new AtomicInteger();
    synchronized void run(Runnable task) {
        ExecutorService pool = Executors.newFixedThreadPool(2);
        pool.submit(task);
        synchronized (this) {
            done.incrementAndGet();
        }
    }
}
