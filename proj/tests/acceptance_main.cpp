#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#include <cstdio>

int main(int argc, char** argv) {
    std::printf("acceptance suite: paper-anchored checks and oracle equivalences\n");
    doctest::Context context(argc, argv);
    const int res = context.run();
    if (context.shouldExit()) return res;
    return res;
}
