import javax.websocket.EncodeException;
import javax.websocket.Encoder;
import javax.websocket.EndpointConfig;

class JsonEncoder implements Encoder.Text<String> {
    public String encode(String s) throws EncodeException {
        return s;
    }
    public void init(EndpointConfig c) {
    }
    public void destroy() {
    }
}
