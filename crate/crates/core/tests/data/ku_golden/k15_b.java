import java.util.regex.Matcher;
import java.util.regex.Pattern;

class Text {
    String build(String input) {
        StringBuilder sb = new StringBuilder();
        sb.append(input).reverse();
        Pattern p = Pattern.compile("[0-9]+");
        Matcher m = p.matcher(input);
        String clean = input.replaceAll("\\s", "");
        return String.format("%s-%b", sb, m.find());
    }
}
