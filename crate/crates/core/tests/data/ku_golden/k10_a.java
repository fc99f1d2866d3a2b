import java.util.List;
import java.util.Optional;
import java.util.stream.Collectors;

class Reports {
    List<String> upper(List<String> xs) {
        return xs.stream().map(String::toUpperCase).sorted().collect(Collectors.toList());
    }
    Optional<String> first(List<String> xs) {
        return xs.stream().filter(x -> x.length() > 2).findFirst();
    }
}
