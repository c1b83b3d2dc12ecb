#include "psid/rng.hpp"
