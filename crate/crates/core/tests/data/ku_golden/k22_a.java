import javax.jws.WebMethod;
import javax.jws.WebService;

@WebService
class Calculator {
    @WebMethod
    int add(int a, int b) {
        return a + b;
    }
}
