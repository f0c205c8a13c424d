package com.toy.util;

public final class MathUtil {
    public static final double PI = 3.14159;

    private MathUtil() {}

    public static double clamp(double v) {
        return Math.max(0, v);
    }
}
