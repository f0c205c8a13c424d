package com.toy.core;

public interface Shape {
    double area();
}
