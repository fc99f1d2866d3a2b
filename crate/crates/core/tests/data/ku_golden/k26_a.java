import javax.faces.bean.ManagedBean;
import javax.faces.bean.RequestScoped;
import javax.faces.component.UIComponent;

@ManagedBean
@RequestScoped
class LoginBean {
    UIComponent panel;
    String user;
}
