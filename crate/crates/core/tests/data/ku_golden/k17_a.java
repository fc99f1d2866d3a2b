import java.sql.Connection;
import java.sql.DriverManager;
import java.sql.ResultSet;
import java.sql.Statement;

class Dao {
    int count(String url) throws Exception {
        Connection c = DriverManager.getConnection(url);
        Statement st = c.createStatement();
        ResultSet rs = st.executeQuery("select 1");
        rs.next();
        return rs.getInt(1);
    }
}
