#include "graphvx/graph_io.hpp"
int main() { return 0; }
