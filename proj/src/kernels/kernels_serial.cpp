// Reference implementation: compiled without OpenMP.
#define FSEG_KERNEL_NS serial
#include "kernels_impl.inc"
