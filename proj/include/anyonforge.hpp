#pragma once

#include "anyonforge/error.hpp"
#include "anyonforge/linalg.hpp"
#include "anyonforge/graph.hpp"
#include "anyonforge/connection.hpp"
#include "anyonforge/path_algebra.hpp"
#include "anyonforge/tensor_network.hpp"
#include "anyonforge/number_field.hpp"
#include "anyonforge/fusion.hpp"
#include "anyonforge/modular_invariant.hpp"
#include "anyonforge/tube_algebra.hpp"
#include "anyonforge/acceptance.hpp"
