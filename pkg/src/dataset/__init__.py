# dataset module
