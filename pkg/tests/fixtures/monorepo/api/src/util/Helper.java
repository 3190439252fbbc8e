public class Helper {
    static String greet() {
        return "hi";
    }
}
