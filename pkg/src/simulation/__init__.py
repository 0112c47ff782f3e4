# simulation module
