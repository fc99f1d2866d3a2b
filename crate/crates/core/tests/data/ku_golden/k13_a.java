import java.io.BufferedReader;
import java.io.InputStreamReader;

class Echo {
    void echo() throws Exception {
        BufferedReader in = new BufferedReader(new InputStreamReader(System.in));
        String line = in.readLine();
        System.out.println(line);
        System.err.println("done");
    }
}
