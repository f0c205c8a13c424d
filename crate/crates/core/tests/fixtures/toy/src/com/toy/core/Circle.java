package com.toy.core;

import com.toy.util.MathUtil;

public class Circle implements Shape {
    private final double r;

    public Circle(double r) {
        this.r = r;
    }

    public double area() {
        return MathUtil.PI * r * r;
    }
}
