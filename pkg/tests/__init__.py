"""Tests for TPC Workshop Reporter."""
