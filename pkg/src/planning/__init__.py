# planning module
