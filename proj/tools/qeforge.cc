#include "qeforge/cli.h"

int main(int argc, char** argv) { return qeforge::RunCli(argc, argv); }
