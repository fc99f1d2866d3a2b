// header comment

/* block
   comment */
public class C {
}
