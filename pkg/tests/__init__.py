# Tests for fukayagen
