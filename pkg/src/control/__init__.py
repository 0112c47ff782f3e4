# control module
