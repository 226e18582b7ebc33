VERSION = "0.3.00"
