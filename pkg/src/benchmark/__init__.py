# benchmark module
