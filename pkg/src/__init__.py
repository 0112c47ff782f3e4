# autonomous driving hierarchy simulator
