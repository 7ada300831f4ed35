#define FSEG_KERNEL_NS omp
#include "kernels_impl.inc"
