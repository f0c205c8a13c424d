package com.toy.app;

import static com.toy.util.MathUtil.clamp;

public class Config {
    double scale = clamp(2.0);

    static Config load() {
        return new Config();
    }

    static class Inner {
        com.toy.core.Circle unit;
    }
}
