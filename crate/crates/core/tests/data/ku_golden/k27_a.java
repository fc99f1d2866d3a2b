import javax.enterprise.inject.Produces;
import javax.inject.Inject;
import javax.inject.Qualifier;

@Qualifier
@interface Fast {
}
class Factory {
    @Inject
    Object dep;
    @Produces
    @Fast
    Object make() {
        return new Object();
    }
}
