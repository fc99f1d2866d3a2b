import javax.ws.rs.GET;
import javax.ws.rs.Path;
import javax.ws.rs.PathParam;
import javax.ws.rs.Produces;
import javax.ws.rs.core.MediaType;

@Path("/items")
class ItemResource {
    @GET
    @Path("{id}")
    @Produces(MediaType.APPLICATION_JSON)
    String find(@PathParam("id") String id) {
        return id;
    }
}
