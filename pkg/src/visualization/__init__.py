# visualization module
