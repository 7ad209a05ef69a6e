package org.example.app;

import java.lang.annotation.*;
import java.lang.String;

@Target(ElementType.FIELD)
@interface Sensitive { }

class User {
    @Sensitive
    private String username;

    User(String username) {
        this.username = username;
    }

    public String getUsername() {
        return username;
    }
}

public class Main {
    public static void main() {
        User user = new User("JohnDoe");
        System.out.println(user.getUsername());
    }
}
