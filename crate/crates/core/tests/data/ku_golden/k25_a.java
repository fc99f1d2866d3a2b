import javax.websocket.OnMessage;
import javax.websocket.OnOpen;
import javax.websocket.Session;
import javax.websocket.server.ServerEndpoint;

@ServerEndpoint("/chat")
class ChatEndpoint {
    @OnOpen
    void open(Session s) {
    }
    @OnMessage
    String echo(String msg) {
        return msg;
    }
}
