#include <cstdio>
int main() { std::puts("nphm placeholder"); return 0; }
