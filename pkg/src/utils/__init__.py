"""Forecast Verification - Utilities Package"""
