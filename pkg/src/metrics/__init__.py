# metrics module
