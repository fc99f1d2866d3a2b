import java.time.ZoneId;
import java.time.ZonedDateTime;
import java.time.format.DateTimeFormatter;
import java.time.temporal.ChronoUnit;

class Clock {
    String stamp(ZonedDateTime when) {
        DateTimeFormatter f = DateTimeFormatter.ISO_DATE;
        return when.withZoneSameInstant(ZoneId.of("UTC")).format(f);
    }
    long days(ZonedDateTime a, ZonedDateTime b) {
        return ChronoUnit.DAYS.between(a, b);
    }
}
