import java.util.function.IntPredicate;

class Grade {
    static String of(int score) {
        if (score > 90) {
            return "A";
        } else if (score > 80) {
            return "B";
        } else {
            return "C";
        }
    }

    static int count(int n) {
        IntPredicate even = v -> v % 2 == 0 ? true : false;
        int c = 0;
        do {
            if (even.test(n)) c++;
            n--;
        } while (n > 0);
        return c;
    }
}
