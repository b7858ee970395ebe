APP_NAME = "dirac-weyl"
CMD_NAME = "diracw"
