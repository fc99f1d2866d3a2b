import javax.jms.JMSContext;
import javax.jms.Queue;
import javax.jms.Session;

class Sender {
    void send(JMSContext ctx, Queue q, Session s) throws Exception {
        ctx.createProducer().send(q, "hello");
        s.commit();
    }
}
