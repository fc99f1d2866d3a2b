import javax.ejb.MessageDriven;
import javax.jms.Message;
import javax.jms.MessageListener;

@MessageDriven
class Listener implements MessageListener {
    public void onMessage(Message m) {
    }
}
