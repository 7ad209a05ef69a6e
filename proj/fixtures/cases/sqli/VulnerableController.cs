using Microsoft.AspNetCore.Mvc;
using System.Data.SqlClient;

public class DbHandler {
    private const String CONNECTION_STRING = "Server=myServerAddress;Database=myDataBase;User Id=myUsername;Password=myPassword;";

    public static String DoQuery(string query) {
        using (SqlConnection connection = new SqlConnection(CONNECTION_STRING)) {
            SqlCommand cmd = new SqlCommand(query, connection);
            return (string)cmd.ExecuteScalar();
        }
    }
}

public class Product { public string? Name { get; set; } }

public class ProductFactory {
    private static String GenQuery(string id) {
        return "SELECT name FROM products WHERE id = " + id;
    }

    public static Product GetProduct(string id) {
        return new Product {
            Name = DbHandler.DoQuery(GenQuery(id))
        };
    }
}

public class VulnerableController : Controller {
    [HttpGet]
    [Route("/product/{id}")]
    public IActionResult ProductInfo(string id) {
        Product product = ProductFactory.GetProduct(id);
        return new JsonResult(product);
    }
}
