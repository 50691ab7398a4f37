#pragma once

#include "ddparab/decomposition.hpp"
#include "ddparab/dense.hpp"
#include "ddparab/experiment.hpp"
#include "ddparab/fem.hpp"
#include "ddparab/mesh.hpp"
#include "ddparab/output.hpp"
#include "ddparab/sparse.hpp"
#include "ddparab/stability.hpp"
#include "ddparab/time_schemes.hpp"
