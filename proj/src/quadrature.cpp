#include "csm/quadrature.hpp"
