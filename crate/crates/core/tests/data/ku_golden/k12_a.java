import java.time.Duration;
import java.time.LocalDate;
import java.time.LocalDateTime;
import java.time.LocalTime;

class Schedule {
    LocalDateTime at(LocalDate d, LocalTime t) {
        return LocalDateTime.of(d, t).plusDays(1);
    }
    Duration gap() {
        return Duration.ofMinutes(5);
    }
}
