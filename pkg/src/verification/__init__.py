"""Forecast Verification - Core Package"""
