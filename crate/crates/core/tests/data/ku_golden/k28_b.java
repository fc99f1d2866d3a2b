import javax.batch.operations.JobOperator;
import javax.batch.runtime.BatchRuntime;
import java.util.Properties;

class Launcher {
    long start() {
        JobOperator op = BatchRuntime.getJobOperator();
        return op.start("job", new Properties());
    }
}
