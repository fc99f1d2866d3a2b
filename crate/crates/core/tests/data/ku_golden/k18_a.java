import java.util.Locale;

class Greeter {
    String lang() {
        Locale l = Locale.getDefault();
        Locale.setDefault(Locale.FRANCE);
        return l.getLanguage();
    }
}
