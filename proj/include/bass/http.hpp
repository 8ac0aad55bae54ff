#pragma once

#include <httplib.h>

// <resolv.h> defines `_res` as a macro, which breaks Eigen's product kernels
// when they are parsed afterwards.
#ifdef _res
#undef _res
#endif
