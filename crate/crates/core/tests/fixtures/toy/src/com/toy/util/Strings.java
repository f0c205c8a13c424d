package com.toy.util;

/* A Shape is never mentioned here outside this comment. */
public final class Strings {
    static final String NOTE = "new Circle(2.0)";

    public static String join(String... parts) {
        // Square, Writer: names in comments are not references
        return String.join(",", parts);
    }
}
