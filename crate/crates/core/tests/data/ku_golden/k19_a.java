import javax.persistence.Column;
import javax.persistence.Entity;
import javax.persistence.Id;
import javax.persistence.Table;

@Entity
@Table(name = "users")
class User {
    @Id
    long id;
    @Column(name = "email")
    String email;
}
