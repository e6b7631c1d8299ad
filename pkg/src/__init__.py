"""Forecast Verification - Source Package"""
