#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#include <cstdlib>

int main(int argc, char** argv) {
    // Single-threaded kernels keep reductions bit-stable across runs.
    setenv("OPENBLAS_NUM_THREADS", "1", 1);
    doctest::Context context(argc, argv);
    return context.run();
}
