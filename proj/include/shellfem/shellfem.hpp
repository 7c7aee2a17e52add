#pragma once

#include "shellfem/error.hpp"
#include "shellfem/expression.hpp"
#include "shellfem/geometry.hpp"
#include "shellfem/mesh.hpp"
#include "shellfem/fe_space.hpp"
#include "shellfem/strain.hpp"
#include "shellfem/assembly.hpp"
#include "shellfem/manufactured.hpp"
#include "shellfem/solve.hpp"
#include "shellfem/norms.hpp"
#include "shellfem/regime.hpp"
#include "shellfem/config.hpp"
#include "shellfem/output.hpp"
#include "shellfem/study.hpp"
