// C API implementation
