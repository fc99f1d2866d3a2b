import javax.ws.rs.client.Client;
import javax.ws.rs.client.ClientBuilder;
import javax.ws.rs.core.Response;

class ItemClient {
    Response fetch() {
        Client client = ClientBuilder.newClient();
        return client.target("http://x").request().get();
    }
}
